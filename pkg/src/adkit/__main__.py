"""Allow `python -m adkit` as an alternative to the `adkit` script."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
