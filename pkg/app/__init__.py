import logging

from dotenv import load_dotenv

from core.managers.config_manager import AppConfig, ConfigManager
from core.managers.logging_manager import LoggingManager
from core.managers.module_manager import ModuleManager

# Load environment variables
load_dotenv()


class Metro:
    """Application context shared by the command line and the test suite."""

    def __init__(self, import_name):
        self.name = import_name
        self.config = AppConfig()
        self.logger = logging.getLogger('app')
        self.modules = []
        self.models = {}
        self.option_defaults = {}

    @property
    def debug(self):
        return bool(self.config.get('DEBUG'))

    def get_model(self, name):
        from core.exceptions.exceptions import ModelError

        try:
            return self.models[name]
        except KeyError:
            known = ', '.join(sorted(self.models))
            raise ModelError(f"Unknown model '{name}' (known: {known})") from None


def create_app(config_name=None, config_file=None, verbose=False):
    app = Metro(__name__)

    # Load configuration according to environment
    config_manager = ConfigManager(app)
    config_manager.load_config(config_name=config_name)
    if config_file:
        app.option_defaults = config_manager.load_file(config_file)
    if verbose:
        app.config['DEBUG'] = True
        if app.config.get('LOG_LEVEL') != 'DEBUG':
            app.config['LOG_LEVEL'] = 'INFO'

    # Set up logging
    logging_manager = LoggingManager(app)
    logging_manager.setup_logging()

    # Register modules
    module_manager = ModuleManager(app)
    module_manager.register_modules()

    return app
