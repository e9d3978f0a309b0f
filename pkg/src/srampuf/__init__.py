"""SRAM PUF simulation, fuzzy extraction, seeding and statistical analysis."""
__version__ = "0.1.0"
