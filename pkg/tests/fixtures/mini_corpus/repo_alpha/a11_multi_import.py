import os, sys

os.path.exists(p)
sys.exit(0)
