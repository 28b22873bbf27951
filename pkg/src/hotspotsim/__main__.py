"""Entry point so `python -m hotspotsim` runs the CLI."""
from .cli import console_main

if __name__ == "__main__":
    console_main()
