"""Extract teachable grammar points from annotated corpora and parallel text."""

__version__ = "0.1.0"
