import functools
import logging
import os

logger = logging.getLogger(__name__)


def logging_decorator(group_name):
    """
    Wraps a call in a named log group: GitHub Actions group markers when
    running in a workflow, plain banners otherwise. Output goes through the
    logging system so stdout stays free for data.
    """

    def decorator_wrapper(original_func):
        @functools.wraps(original_func)
        def wrapper_func(*func_args, **func_kwargs):
            if os.environ.get("GITHUB_ACTIONS") == "true":
                logger.info(f"::group::{group_name}")
                result = original_func(*func_args, **func_kwargs)
                logger.info("::endgroup::")
            else:
                logger.info(f"=={group_name}==")
                result = original_func(*func_args, **func_kwargs)
                logger.info("==End==")

            return result

        return wrapper_func

    return decorator_wrapper


def read_file(file_path: str) -> str:
    """
    Reads content from a file.
    """
    with open(file_path, 'r', encoding='utf-8') as file:
        return file.read()
