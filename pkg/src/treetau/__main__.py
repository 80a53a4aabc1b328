from treetau.cli import main
import sys

sys.exit(main())
