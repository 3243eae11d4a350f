"""Packaged fixture data."""

from importlib import resources

TABLE2_VENTRAL = ("manual_ventral", "semiauto_ventral", "auto_ventral")
TABLE2_DORSAL = ("manual_dorsal", "semiauto_dorsal", "auto_dorsal")


def table2_path():
    """Path of the midsagittal bridge widths (mm) of 15 subjects, three methods."""
    return resources.files(__name__).joinpath("table2.csv")
