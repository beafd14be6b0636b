"""Image preprocessing: resize shorter side to 256, center crop 224, normalize.

The normalization constants are the standard ImageNet channel statistics.
"""

import numpy as np
from PIL import Image

from .errors import AssetError

RESIZE_TARGET = 256
CROP_SIZE = 224
CHANNEL_MEAN = np.array([0.485, 0.456, 0.406])
CHANNEL_STD = np.array([0.229, 0.224, 0.225])


def resize_shorter_side(arr, target=RESIZE_TARGET):
    """Bilinear resize so the shorter side equals ``target``, keeping aspect."""
    h, w = arr.shape[:2]
    if min(h, w) == target:
        return arr
    if h <= w:
        new_h, new_w = target, round(w * target / h)
    else:
        new_h, new_w = round(h * target / w), target
    channels = []
    for c in range(arr.shape[2]):
        img = Image.fromarray(arr[:, :, c].astype(np.float32), mode="F")
        channels.append(np.asarray(img.resize((new_w, new_h), Image.BILINEAR),
                                   dtype=np.float64))
    return np.stack(channels, axis=2)


def center_crop(arr, size=CROP_SIZE):
    h, w = arr.shape[:2]
    top = (h - size) // 2
    left = (w - size) // 2
    return arr[top:top + size, left:left + size]


def normalize(arr):
    """(H, W, 3) in [0, 1] -> channel-first (3, H, W), (x - mean) / std."""
    return ((arr - CHANNEL_MEAN) / CHANNEL_STD).transpose(2, 0, 1)


def preprocess_array(arr):
    """Full pipeline on an (H, W, 3) float array in [0, 1]."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise AssetError(f"expected an (H, W, 3) array, got shape {arr.shape}")
    return normalize(center_crop(resize_shorter_side(arr)))


def preprocess_image(path):
    """Decode an image file and preprocess it to a (3, 224, 224) block."""
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
    except Exception as exc:
        raise AssetError(f"cannot decode image {path}: {exc}") from exc
    arr = np.asarray(rgb, dtype=np.float64) / 255.0
    return preprocess_array(arr)
