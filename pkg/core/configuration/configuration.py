import os
from dotenv import load_dotenv

load_dotenv()


def env_float(name, default):
    value = os.getenv(name)
    if value is None or value == '':
        return default
    return float(value)


def env_bool(name, default=False):
    value = os.getenv(name)
    if value is None or value == '':
        return default
    return value.strip().lower() in ('1', 'true', 'yes', 'on')
