"""Agent-based hospital ward simulation: doctors, robot doctors and visitors
treating and visiting patients, with fuzzy decisions and trust diffusion."""

__version__ = "0.1.0"

import logging

# library convention: stay silent unless the application configures logging
logging.getLogger(__name__).addHandler(logging.NullHandler())
