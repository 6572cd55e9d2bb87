"""rsdnet: toy-scale feature-reconstruction bottleneck block plus a smoke
training loop over an augmentation CLI's output directory."""

from .blocks import ChannelRefine, ConfigError, RsdBlock, RsdConfig, SpatialReconstruct
from .data import AugmentedDirError, AugmentedSample, AugmentedSet, load_augmented_dir
from .train import TinySegNet, ToyConfig, smoke_train

__version__ = "0.1.0"

__all__ = [
    "AugmentedDirError", "AugmentedSample", "AugmentedSet", "ChannelRefine",
    "ConfigError", "RsdBlock", "RsdConfig", "SpatialReconstruct", "TinySegNet",
    "ToyConfig", "load_augmented_dir", "smoke_train",
]
