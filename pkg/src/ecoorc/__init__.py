"""Environment-aware placement and migration of jobs across geo-distributed data centers."""

__version__ = "0.1.0"
