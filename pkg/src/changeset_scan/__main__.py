"""Main entry point for changeset-scan."""

from .server import main

if __name__ == "__main__":
    main()
