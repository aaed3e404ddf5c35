import importlib
import logging
import os

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


class ModuleManager:
    def __init__(self, app):
        self.app = app
        working_dir = os.getenv('WORKING_DIR', '')
        package_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
        self.modules_dir = os.path.join(working_dir or package_root, 'app', 'modules')
        self.ignored_modules_file = os.path.join(working_dir or package_root, '.moduleignore')
        self.ignored_modules = self._load_ignored_modules()

    def _load_ignored_modules(self):
        ignored_modules = []
        if os.path.exists(self.ignored_modules_file):
            with open(self.ignored_modules_file, 'r') as f:
                ignored_modules = [line.strip() for line in f.readlines() if line.strip()]
        return ignored_modules

    def _module_names(self):
        names = []
        for module_name in sorted(os.listdir(self.modules_dir)):
            module_path = os.path.join(self.modules_dir, module_name)
            if (os.path.isdir(module_path) and not module_name.startswith('__') and
                    os.path.exists(os.path.join(module_path, '__init__.py')) and
                    module_name != '.pytest_cache'):
                names.append(module_name)
        return names

    def register_modules(self):
        self.app.modules = []
        self.app.models = {}

        for module_name in self._module_names():
            if module_name in self.ignored_modules:
                continue
            self.register_module(module_name)

    def register_module(self, module_name):
        self.app.modules.append(module_name)
        module_path = os.path.join(self.modules_dir, module_name, 'quantities.py')
        if not os.path.exists(module_path):
            return
        quantities_module = importlib.import_module(f'app.modules.{module_name}.quantities')
        for model in getattr(quantities_module, 'MODELS', []):
            logger.debug(f"Registering model '{model.name}' from module '{module_name}'")
            self.app.models[model.name] = model

    def get_modules(self):
        all_modules = self._module_names()
        loaded_modules = [m for m in all_modules if m not in self.ignored_modules]
        return loaded_modules, self.ignored_modules
