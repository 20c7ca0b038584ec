"""
Configuración de logging.
"""
import logging

_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def configure_logging(level: str = "INFO") -> None:
    """
    Configura el logger raíz del paquete.

    Args:
        level: Nivel de logging (DEBUG, INFO, WARNING, ...)
    """
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        numeric = logging.INFO

    logger = logging.getLogger("hjrate")
    logger.setLevel(numeric)

    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        logger.addHandler(handler)
