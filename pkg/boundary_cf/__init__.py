# -*- coding: utf-8 -*-

__pkg__ = 'Boundary-CF'
__url__ = 'https://github.com/bprinty/Boundary-CF'
__info__ = 'Correlation filters with limited boundary effects, trained by ADMM in the frequency domain'
__author__ = 'Blake Printy'
__email__ = 'bprinty@gmail.com'
__version__ = '0.1.0'


from .exceptions import FilterError                 ## noqa
from .exceptions import InputError                  ## noqa

from .signal import MaskSpec                        ## noqa
from .signal import circular_shift                  ## noqa
from .signal import power_normalize                 ## noqa
from .signal import cosine_window                   ## noqa
from .signal import crop, pad                       ## noqa
from .signal import gaussian_response               ## noqa
from .signal import desired_response                ## noqa
from .signal import preprocess                      ## noqa

from .spectral import dft2, idft2                   ## noqa
from .spectral import SpectralEnergies              ## noqa
from .spectral import spectral_energies             ## noqa
from .spectral import online_update                 ## noqa

from .solvers import RegularizedProblem             ## noqa
from .solvers import AdmmParams                     ## noqa
from .solvers import FilterModel                    ## noqa
from .solvers import mosse_train                    ## noqa
from .solvers import cflb_admm_train                ## noqa
from .solvers import spatial_ridge_oracle           ## noqa
from .solvers import masked_spatial_oracle          ## noqa
from .solvers import gradient_descent_train         ## noqa

from .detect import correlate, locate, psr          ## noqa
from .detect import normalized_distance             ## noqa

from .track import TrackerParams                    ## noqa
from .track import init_tracker, track_step         ## noqa
from .track import run_sequence                     ## noqa
from .track import precision_curve                  ## noqa
