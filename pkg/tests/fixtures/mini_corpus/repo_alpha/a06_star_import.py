from os import *

path.join("x", "y")
getcwd()
