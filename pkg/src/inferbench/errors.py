"""Exception hierarchy shared by all stages."""


class InferBenchError(Exception):
    """Base class for every error raised by this package."""


class ParseError(InferBenchError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class SignatureConflictError(InferBenchError):
    """A name is used with two different kinds (e.g. constant and relation)."""


class SafetyError(InferBenchError):
    """A rule mentions a variable not bound by any inequality-free body atom."""


class ShortfallError(InferBenchError):
    """A candidate pool is too small to produce the requested number of negatives."""


class UndefinedMetricError(InferBenchError):
    pass


class CoverageError(InferBenchError):
    def __init__(self, missing, total=None):
        self.missing = list(missing)
        shown = "\n".join("  " + "\t".join(t) for t in self.missing[:20])
        count = total if total is not None else len(self.missing)
        super().__init__(f"predictions missing for {count} triple(s):\n{shown}")
