import logging
from logging.handlers import RotatingFileHandler


class LoggingManager:
    def __init__(self, app):
        self.app = app

    def setup_logging(self):
        logger = self.app.logger

        # Drop handlers left by a previous application instance
        for handler in list(logger.handlers):
            logger.removeHandler(handler)
            handler.close()

        # Configure log format
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

        # Configure the log file with file rotation
        log_file = self.app.config.get('LOG_FILE')
        if log_file:
            file_handler = RotatingFileHandler(log_file, maxBytes=10240, backupCount=10, delay=True)
            file_handler.setLevel(logging.ERROR)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        # Configure console log if necessary
        if self.app.debug:
            stream_handler = logging.StreamHandler()
            stream_handler.setLevel(logging.INFO)
            stream_handler.setFormatter(formatter)
            logger.addHandler(stream_handler)

        # Set the overall log level
        logger.setLevel(self.app.config.get('LOG_LEVEL', 'INFO'))
