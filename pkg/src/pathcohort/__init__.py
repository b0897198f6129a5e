"""Histology-driven similar-cohort retrieval and personalized survival weighting."""

__version__ = "0.1.0"
#: Version byte written into PGIX index files.
INDEX_FORMAT_VERSION = 1
