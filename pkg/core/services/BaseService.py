from core.managers.config_manager import default_config


class BaseService:
    def __init__(self, config=None):
        self.config = config if config is not None else default_config()

    @property
    def fd_step(self) -> float:
        return float(self.config['FD_STEP'])

    @property
    def richardson(self) -> bool:
        return bool(self.config['RICHARDSON'])

    @property
    def floor(self) -> float:
        return float(self.config['PROBABILITY_FLOOR'])

    @property
    def singular_derivative(self) -> float:
        return float(self.config['SINGULAR_DERIVATIVE'])
