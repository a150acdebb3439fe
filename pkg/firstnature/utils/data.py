from typing import List


class Bunch(dict):
    """
    Container object for synthetic worlds and pipeline outputs.
    Dictionary-like object that exposes its keys as attributes.
    """

    def __init__(self, **kwargs):
        super().__init__(kwargs)

    def __setattr__(self, key, value):
        self[key] = value

    def __dir__(self):
        return self.keys()

    def __getattr__(self, key):
        try:
            return self[key]
        except KeyError:
            raise AttributeError(key)


def parse_list(value: str, cast=str) -> List:
    """
    Parse a comma separated configuration value into a list, casting every element.

    Parameters
    ----------
    value
        Raw value, e.g. ``'-1, -2, -4'``.
    cast
        Callable applied to each stripped element.

    Returns
    -------
    List of cast elements. An empty string gives an empty list.
    """
    return [cast(v.strip()) for v in value.split(',') if v.strip()]
