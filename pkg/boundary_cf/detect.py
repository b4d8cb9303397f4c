# -*- coding: utf-8 -*-
#
# Applying filters: response maps, peaks and scores
#
# ------------------------------------------------


# imports
# -------
import math

import numpy as np

from .exceptions import ShapeError, DegenerateInputError, ParameterError
from .signal import as_signal
from .spectral import dft2, idft2


# types
# -----
class ResponseMap(object):
    """
    Correlation output over a search image, with its peak.
    The peak is the first maximum in row-major order.
    """

    def __init__(self, response):
        self.response = as_signal(response, 'response')
        flat = int(np.argmax(self.response))
        self.peak_loc = tuple(int(x) for x in np.unravel_index(flat, self.response.shape))
        self.peak_value = float(self.response[self.peak_loc])
        return

    @property
    def shape(self):
        return self.response.shape

    def __repr__(self):
        return 'ResponseMap(shape={}, peak={}, value={:.4g})'.format(self.shape, self.peak_loc, self.peak_value)


# operations
# ----------
def correlate(model, image):
    """
    Circular correlation of a (preprocessed) image with a trained filter.

    Arguments:
        model (FilterModel): Filter whose window shape equals the image
            shape. Use :meth:`FilterModel.embed` for larger images.
        image (array): Search image.
    """
    image = as_signal(image, 'image')
    if image.shape != model.mask.outer:
        raise ShapeError('Image shape {} does not match filter window {}.'.format(image.shape, model.mask.outer))
    return ResponseMap(idft2(dft2(image) * np.conj(model.h_hat_padded)))


def locate(response, model):
    """
    Map the raw response peak to the image location of the target
    centre, using the filter anchor.
    """
    (pr, pc), (ar, ac) = response.peak_loc, model.anchor
    h, w = response.shape
    return ((pr + ar) % h, (pc + ac) % w)


def psr(response, exclusion_radius=5):
    """
    Peak-to-sidelobe ratio. The sidelobe is every sample outside the
    ``(2 r + 1)`` square centred on the peak.
    """
    if exclusion_radius < 0:
        raise ParameterError('Exclusion radius must be non-negative.')
    r, c = response.peak_loc
    keep = np.ones(response.shape, dtype=bool)
    keep[max(0, r - exclusion_radius):r + exclusion_radius + 1,
         max(0, c - exclusion_radius):c + exclusion_radius + 1] = False
    sidelobe = response.response[keep]
    if sidelobe.size == 0:
        raise DegenerateInputError('Exclusion window covers the whole response.')
    std = float(sidelobe.std())
    if std <= 1e-12 * max(1.0, abs(response.peak_value)):
        raise DegenerateInputError('Sidelobe has zero variance.')
    return (response.peak_value - float(sidelobe.mean())) / std


def normalized_distance(pred, right_eye, left_eye):
    """
    Localisation error normalised by the inter-ocular distance.
    """
    scale = math.hypot(left_eye[0] - right_eye[0], left_eye[1] - right_eye[1])
    if scale == 0:
        raise DegenerateInputError('Eye coordinates coincide.')
    return math.hypot(pred[0] - right_eye[0], pred[1] - right_eye[1]) / scale
