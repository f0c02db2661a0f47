"""Enable `python -m stratk`."""
from .cli import main

if __name__ == "__main__":  # pragma: no cover - module entry
    main()
