import logging
import warnings

from rich.logging import RichHandler

from .reporter import console


def setup_quiet_environment():
    # Overflow and invalid-value warnings from tail evaluations are expected and handled
    warnings.filterwarnings("ignore", category=RuntimeWarning)
    warnings.filterwarnings("ignore", module="scipy")


def setup_logging(level: str = "info") -> logging.Logger:
    """
    Route the gst_lab loggers through a single RichHandler.

    Safe to call more than once; the handler is replaced, not stacked.
    """
    logger = logging.getLogger("gst_lab")
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=console, show_path=False, markup=False, rich_tracebacks=False)
    handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    logger.addHandler(handler)
    logger.setLevel(getattr(logging, level.upper()))
    logger.propagate = False
    return logger
