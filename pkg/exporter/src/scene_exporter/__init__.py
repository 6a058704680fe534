"""Export real images into pointtarget scene files via off-the-shelf models."""

from .backends import ModelUnavailable
from .export import ExportConfig, export_scene
from .writer import RawDetection, SceneDocument, write_scene

__version__ = "0.1.0"
