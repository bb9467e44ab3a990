# __init__.py for softmix utilities
