# -*- coding: utf-8 -*-
#
# Synthetic localisation sets and tracking sequences
#
# ------------------------------------------------


# imports
# -------
import os
import csv
import logging
from collections import namedtuple

import numpy as np
from scipy import ndimage

from .exceptions import InputError
from .signal import read_image, write_pgm


# config
# ------
logger = logging.getLogger(__name__)

ANNOTATIONS = 'annotations.csv'
GROUND_TRUTH = 'groundtruth.txt'


# types
# -----
Annotation = namedtuple('Annotation', ['name', 'right', 'left'])
LocalizationSet = namedtuple('LocalizationSet', ['images', 'annotations'])
Sequence = namedtuple('Sequence', ['frames', 'centers', 'bbox'])


# textures
# --------
def _unit(s):
    lo, hi = s.min(), s.max()
    return (s - lo) / (hi - lo) if hi > lo else np.full_like(s, 0.5)


def clutter(rng, shape, amplitude=0.3, sigma=2.0):
    """
    Smoothed random background centred on mid-grey.
    """
    field = ndimage.gaussian_filter(rng.standard_normal(shape), sigma, mode='wrap')
    return 0.5 + amplitude * (_unit(field) - 0.5)


def texture(rng, shape, sigma=1.2):
    """
    High-contrast random pattern used as the planted target.
    """
    return _unit(ndimage.gaussian_filter(rng.standard_normal(shape), sigma, mode='reflect'))


def _blend(image, patch, center, alpha):
    h, w = patch.shape
    top, left = center[0] - h // 2, center[1] - w // 2
    region = image[top:top + h, left:left + w]
    image[top:top + h, left:left + w] = (1.0 - alpha) * region + alpha * patch
    return image


def _fits(center, size, shape):
    top, left = center[0] - size[0] // 2, center[1] - size[1] // 2
    return top >= 0 and left >= 0 and top + size[0] <= shape[0] and left + size[1] <= shape[1]


# generators
# ----------
def localization_set(count, seed=0, shape=(128, 128), template_size=(16, 16),
                     right=(40, 96), left=(40, 32), jitter=4, distractor_contrast=0.6,
                     distractors=2, noise=0.02, clutter_amplitude=0.3):
    """
    Images with a planted target (the right reference point), its
    mirrored copy at reduced contrast at the left reference point and
    further reduced-contrast copies at random places.

    Arguments:
        count (int): Number of images.
        seed (int): Generator seed.
        shape (tuple): Image shape.
        template_size (tuple): Target shape.
        right (tuple): Nominal target centre.
        left (tuple): Nominal centre of the mirrored distractor.
        jitter (int): Per-image displacement range of both points.
        distractor_contrast (float): Blend weight of distractors.
        distractors (int): Extra distractor copies per image.
        noise (float): Per-image white noise level.
        clutter_amplitude (float): Background contrast.
    """
    rng = np.random.default_rng(seed)
    template = texture(rng, template_size)
    mirrored = template[:, ::-1]
    images, annotations = [], []
    for idx in range(count):
        image = clutter(rng, shape, clutter_amplitude)
        offset = rng.integers(-jitter, jitter + 1, size=2)
        r = (int(right[0] + offset[0]), int(right[1] + offset[1]))
        offset = rng.integers(-jitter, jitter + 1, size=2)
        l = (int(left[0] + offset[0]), int(left[1] + offset[1]))
        if not (_fits(r, template_size, shape) and _fits(l, template_size, shape)):
            raise InputError('Reference points do not fit the {} image.'.format(shape))

        for _ in range(distractors):
            for _attempt in range(20):
                c = (int(rng.integers(0, shape[0])), int(rng.integers(0, shape[1])))
                clear = all(
                    abs(c[0] - p[0]) >= template_size[0] or abs(c[1] - p[1]) >= template_size[1]
                    for p in (r, l)
                )
                if clear and _fits(c, template_size, shape):
                    _blend(image, template, c, distractor_contrast)
                    break

        _blend(image, mirrored, l, distractor_contrast)
        _blend(image, template, r, 1.0)
        if noise > 0:
            image = image + noise * rng.standard_normal(shape)
        images.append(np.clip(image, 0.0, 1.0))
        annotations.append(Annotation('img_{:04d}.pgm'.format(idx), r, l))
    return LocalizationSet(images, annotations)


def tracking_sequence(frames, seed=0, shape=(128, 192), target_size=(24, 24),
                      start=(64, 30), velocity=(0.0, 2.0), noise=0.02, clutter_amplitude=0.3):
    """
    A textured target translating over a fixed cluttered background.
    Centres are rounded to whole pixels.
    """
    rng = np.random.default_rng(seed)
    background = clutter(rng, shape, clutter_amplitude)
    target = texture(rng, target_size)
    images, centers = [], []
    for idx in range(frames):
        c = (int(round(start[0] + idx * velocity[0])), int(round(start[1] + idx * velocity[1])))
        if not _fits(c, target_size, shape):
            raise InputError('Target path leaves the {} frame at frame {}.'.format(shape, idx))
        image = _blend(background.copy(), target, c, 1.0)
        if noise > 0:
            image = image + noise * rng.standard_normal(shape)
        images.append(np.clip(image, 0.0, 1.0))
        centers.append(c)
    c = centers[0]
    bbox = (c[0] - target_size[0] // 2, c[1] - target_size[1] // 2, target_size[0], target_size[1])
    return Sequence(images, centers, bbox)


# io
# --
def _makedirs(directory):
    try:
        if not os.path.isdir(directory):
            os.makedirs(directory)
    except OSError as exc:
        raise InputError('Could not create `{}`: {}'.format(directory, exc))
    return


def write_localization_set(directory, dataset):
    _makedirs(directory)
    for image, ann in zip(dataset.images, dataset.annotations):
        write_pgm(os.path.join(directory, ann.name), image)
    with open(os.path.join(directory, ANNOTATIONS), 'w', newline='') as fi:
        writer = csv.writer(fi)
        writer.writerow(['name', 'right_row', 'right_col', 'left_row', 'left_col'])
        for ann in dataset.annotations:
            writer.writerow([ann.name, ann.right[0], ann.right[1], ann.left[0], ann.left[1]])
    logger.info('wrote %d localisation images to %s', len(dataset.images), directory)
    return


def read_localization_set(directory):
    """
    Read images listed in the annotation table of a directory.
    """
    path = os.path.join(directory, ANNOTATIONS)
    if not os.path.isfile(path):
        raise InputError('No annotation table at `{}`.'.format(path))
    images, annotations = [], []
    with open(path, 'r') as fi:
        for row in csv.DictReader(fi):
            try:
                ann = Annotation(
                    row['name'],
                    (int(row['right_row']), int(row['right_col'])),
                    (int(row['left_row']), int(row['left_col'])),
                )
            except (KeyError, TypeError, ValueError):
                raise InputError('Malformed annotation row: {}'.format(row))
            image = read_image(os.path.join(directory, ann.name))
            for point in (ann.right, ann.left):
                if not (0 <= point[0] < image.shape[0] and 0 <= point[1] < image.shape[1]):
                    raise InputError('Annotation {} lies outside image `{}`.'.format(point, ann.name))
            images.append(image)
            annotations.append(ann)
    if not images:
        raise InputError('Annotation table `{}` is empty.'.format(path))
    return LocalizationSet(images, annotations)


def write_sequence(directory, sequence):
    _makedirs(directory)
    height, width = sequence.bbox[2], sequence.bbox[3]
    for idx, frame in enumerate(sequence.frames):
        write_pgm(os.path.join(directory, 'frame_{:04d}.pgm'.format(idx)), frame)
    with open(os.path.join(directory, GROUND_TRUTH), 'w') as fi:
        for idx, c in enumerate(sequence.centers):
            fi.write('{},{},{},{},{}\n'.format(idx, c[0], c[1], height, width))
    logger.info('wrote %d frames to %s', len(sequence.frames), directory)
    return
