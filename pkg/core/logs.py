# core/logs.py
"""
Logger factory used by every component
"""

import logging

from config.settings import settings


def setup_logger(component: str, name: str) -> logging.Logger:
    logger = logging.getLogger(f'PTC.{component}.{name}')
    logger.setLevel(str(settings.get('logging.level', 'INFO')).upper())

    if not logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger
