"""Exception hierarchy shared by every stage of the pipeline."""


class BlockPlaceError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(BlockPlaceError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class HwConfigError(BlockPlaceError):
    pass


class AnalysisError(BlockPlaceError):
    pass


class ModelError(BlockPlaceError):
    pass


class SolverError(BlockPlaceError):
    pass


class TransformError(BlockPlaceError):
    pass


class SimError(BlockPlaceError):
    pass


class MemoryFault(SimError):
    def __init__(self, address, block):
        self.address = address
        self.block = block
        super().__init__(f"data memory access out of bounds at word {address} in block {block}")


class StepLimitExceeded(SimError):
    def __init__(self, max_steps):
        self.max_steps = max_steps
        super().__init__(f"step budget of {max_steps} exhausted (program may not terminate)")


class CallDepthExceeded(SimError):
    pass


class CaseStudyError(BlockPlaceError):
    pass
