"""Text2SQL evaluation toolkit: match functions, noise diagnostics, triage."""

__version__ = '0.1.0'
