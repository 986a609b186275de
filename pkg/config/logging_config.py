import logging
import logging.handlers
import os
from datetime import datetime
import json
from typing import Optional

import numpy as np

STRUCTURED_FIELDS = (
    'run_details',
    'spectrum_details',
    'schedule_details',
    'readout_details',
    'chsh_details',
    'error_details',
)

_RECORD_DEFAULTS = set(logging.LogRecord('', 0, '', 0, '', None, None).__dict__) | {'message', 'asctime'}


def json_default(value):
    """Make numpy scalars, arrays and complex numbers JSON-friendly."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return str(value)


class CustomFormatter(logging.Formatter):
    """Custom formatter that properly handles structured data in extra fields."""
    def format(self, record):
        # Work on a copy so a second handler does not see the expanded message
        record = logging.makeLogRecord(record.__dict__)
        for field in STRUCTURED_FIELDS:
            if hasattr(record, field):
                record.msg = f"{record.msg}\n{json.dumps(getattr(record, field), indent=2, default=json_default)}"
                break

        # Add any extra fields that aren't already handled
        extra_fields = {
            key: value for key, value in record.__dict__.items()
            if key not in _RECORD_DEFAULTS and key not in STRUCTURED_FIELDS
        }

        if extra_fields:
            record.msg = f"{record.msg}\nExtra: {json.dumps(extra_fields, indent=2, default=json_default)}"

        return super().format(record)


def setup_logging(level: str = "INFO", log_dir: Optional[str] = None) -> logging.Logger:
    """Configure logging for console and, optionally, file output."""
    formatter = CustomFormatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    console_handler.setLevel(level)

    root_logger = logging.getLogger("bellqed")
    root_logger.setLevel(level)

    # Remove any existing handlers
    root_logger.handlers = []
    root_logger.addHandler(console_handler)

    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

        # Monthly file name, daily rotation
        log_file = os.path.join(log_dir, f"bellqed_{datetime.now().strftime('%Y%m')}.log")
        file_handler = logging.handlers.TimedRotatingFileHandler(
            log_file,
            when="midnight",
            interval=1,
            backupCount=30
        )
        file_handler.setFormatter(formatter)
        file_handler.setLevel(logging.DEBUG)
        root_logger.addHandler(file_handler)

    return root_logger


def get_logger(name: str) -> logging.Logger:
    """Get a component logger under the bellqed namespace."""
    return logging.getLogger(f"bellqed.{name}")
