import os
from typing import List

from .core.config import write_scenario
from .core.scenarios import list_scenarios


def write_scenario_configs(directory: str = "configs") -> List[str]:
    """
    Write every registered scenario as `<name>.ini` into a directory.

    Args:
        directory (str): Target directory, created when missing

    Returns:
        list: Paths of the written files, in name order
    """
    os.makedirs(directory, exist_ok=True)
    return [
        write_scenario(scenario, os.path.join(directory, f"{name}.ini"))
        for name, scenario in list_scenarios().items()
    ]


if __name__ == "__main__":
    for path in write_scenario_configs():
        print(path)
