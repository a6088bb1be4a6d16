"""Entry point for running specwave as a module: python -m specwave"""

from specwave import main

if __name__ == "__main__":
    main()
