"""Game rule engines and training-data synthesis for Doudizhu and Go."""

__version__ = "0.1.0"
