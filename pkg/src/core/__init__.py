# __init__.py for softmix core: exceptions and shared utilities
