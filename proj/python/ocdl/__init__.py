"""Convolutional sparse coding and online dictionary learning."""

from ._ocdl import (
    ConfigError,
    FormatError,
    InvalidArgument,
    IoError,
    Trainer,
    center_crop_resize,
    checkpoint_size,
    csc_objective,
    csc_solve,
    export_dictionary_tiles,
    forward_dft,
    init_dictionary,
    inverse_dft_real,
    lambda_max,
    load_grayscale,
    num_threads,
    project_filter,
    set_num_threads,
    tikhonov_highpass,
)


def train(images, **options):
    """One pass over `images` (2-D arrays of equal shape).

    Returns (trainer, metrics) where metrics holds one dict per sample.
    """
    images = list(images)
    if not images:
        raise ValueError("no images")
    height, width = images[0].shape
    trainer = Trainer(height, width, **options)
    metrics = [trainer.step(s) for s in images]
    return trainer, metrics


__all__ = [name for name in dir() if not name.startswith("_")]
