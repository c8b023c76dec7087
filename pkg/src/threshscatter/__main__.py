"""
Entry point for running ThreshScatter as a module.
Usage: python -m threshscatter [command]
"""
# This file enables running the tool via `python -m threshscatter`
from .cli import app

if __name__ == "__main__":
    app()
