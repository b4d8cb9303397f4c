# -*- coding: utf-8 -*-
#
# Error types
#
# ------------------------------------------------


# base
# ----
class FilterError(AssertionError):
    """
    Base class for every error raised by the toolkit. Messages
    are prefixed with ``Error:`` so they read the same from the
    library and from the command line.
    """

    def __init__(self, message):
        if not message.startswith('Error:'):
            message = 'Error: {}'.format(message)
        super(FilterError, self).__init__(message)
        return


# numerical
# ---------
class DegenerateInputError(FilterError):
    pass


class ShapeError(FilterError):
    pass


class ParameterError(FilterError):
    pass


class SizeGuardError(FilterError):
    pass


class SingularProblemError(FilterError):
    pass


class SymmetryError(FilterError):
    pass


class NonFiniteError(FilterError):
    """
    Raised when an ADMM iterate stops being finite.

    Arguments:
        subproblem (str): Name of the step that produced the bad
            values (``solve_g``, ``solve_h``, ``multiplier_update``).
    """

    def __init__(self, message, subproblem=None):
        super(NonFiniteError, self).__init__(message)
        self.subproblem = subproblem
        return


class DivergenceError(FilterError):
    """
    Raised by gradient descent once the objective grows
    past the divergence bound. The partial trace is attached.
    """

    def __init__(self, message, trace=None):
        super(DivergenceError, self).__init__(message)
        self.trace = list(trace or [])
        return


# input
# -----
class InputError(FilterError):
    pass


class ConfigError(InputError):
    pass
