# ccwb/__main__.py
from ccwb.main import main

main()
