"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` (a ``ValueError``);
file problems derive from :class:`VolumeIOError` (an ``OSError``). The CLI maps
the first family to exit code 2 and the second to exit code 1.
"""


class ValidationError(ValueError):
    pass


class EmptyInputError(ValidationError):
    pass


class DegenerateInputError(ValidationError):
    pass


class SampleSizeError(ValidationError):
    pass


class GeometryMismatchError(ValidationError):
    pass


class NiftiFormatError(ValidationError):
    """File is not a readable NIfTI-1 image."""


class UnsupportedDtypeError(NiftiFormatError):
    def __init__(self, code, path=None):
        self.code = code
        where = f" in {path}" if path else ""
        super().__init__(
            f"unsupported NIfTI datatype code {code}{where} "
            "(supported: 2=uint8, 4=int16, 8=int32, 16=float32, 64=float64)"
        )


class DimensionalityError(NiftiFormatError):
    pass


class VolumeIOError(OSError):
    pass
