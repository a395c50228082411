"""Exception and warning types shared across the package."""


class MeshPrintError(Exception):
    """Base class for every error raised by meshprint."""


# expression parsing / evaluation

class ExpressionSyntaxError(MeshPrintError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(MeshPrintError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class ArityError(MeshPrintError):
    def __init__(self, func, expected, got, offset):
        super().__init__(f"{func}() takes {expected} argument(s), got {got} (offset {offset})")
        self.func = func
        self.expected = expected
        self.got = got
        self.offset = offset


class DomainError(MeshPrintError):
    def __init__(self, x, y, value):
        super().__init__(f"non-finite value {value!r} at (x={x!r}, y={y!r})")
        self.x = x
        self.y = y
        self.value = value


# heightfields

class HeightFieldError(MeshPrintError):
    pass


class EmptyDomain(HeightFieldError):
    pass


class AllBelowFloor(HeightFieldError):
    pass


class UnsupportedRaster(HeightFieldError):
    pass


class ShapeMismatch(HeightFieldError):
    pass


class NonFiniteValue(HeightFieldError):
    def __init__(self, index, value):
        super().__init__(f"non-finite value {value!r} at index {index}")
        self.index = index
        self.value = value


class GridFormatError(HeightFieldError):
    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip())
        self.path = path
        self.line = line


# meshes and STL

class DegenerateFacet(MeshPrintError):
    pass


class ParseError(MeshPrintError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MissingEndSolid(ParseError):
    pass


class TruncatedFile(MeshPrintError):
    pass


class HeaderLooksAscii(UserWarning):
    """Binary STL whose 80-byte header starts with ``solid``; many readers misdetect it."""


# slicing

class NotWatertight(MeshPrintError):
    def __init__(self, report):
        super().__init__(f"mesh is not watertight: {report.summary()}")
        self.report = report


class DegenerateThickness(MeshPrintError):
    pass


class EmptyPrint(UserWarning):
    """Slicing produced no layers."""


class OpenContour(MeshPrintError):
    def __init__(self, endpoints, z=None):
        pts = ", ".join(f"({x:g}, {y:g})" for x, y in endpoints[:6])
        more = "" if len(endpoints) <= 6 else f" (+{len(endpoints) - 6} more)"
        at = "" if z is None else f" at z={z:g}"
        super().__init__(f"open contour{at}: dangling endpoints {pts}{more}")
        self.endpoints = list(endpoints)
        self.z = z


# toolpaths / preview

class DiscontinuousPath(MeshPrintError):
    pass


class CanvasTooSmall(MeshPrintError):
    pass
