# __init__.py for the softmix command line
