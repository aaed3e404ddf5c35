from functools import wraps

import click


def with_services(**service_classes):
    """Builds each named service from the running application's config and passes it as a keyword."""

    def decorator(f):

        @wraps(f)
        def decorated_function(*args, **kwargs):
            app = click.get_current_context().find_root().obj
            config = app.config if app is not None else None
            for name, service_class in service_classes.items():
                kwargs[name] = service_class(config)
            return f(*args, **kwargs)
        return decorated_function

    return decorator


def pass_app(f):
    """Passes the running application as the `app` keyword."""

    @wraps(f)
    def decorated_function(*args, **kwargs):
        kwargs['app'] = click.get_current_context().find_root().obj
        return f(*args, **kwargs)
    return decorated_function
