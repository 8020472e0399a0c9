import sys

from py_gl_preservers.cli import main

if __name__ == '__main__':
    sys.exit(main())
