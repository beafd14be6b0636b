"""Text and image encoders.

Two families: pretrained encoders (a bidirectional transformer for text, a
residual convnet for images) that need locally available weights, and seeded
deterministic encoders that work offline and are used by the test suite. Both
are pure functions of their inputs, so extraction files are reproducible
byte for byte.
"""

import hashlib

import numpy as np

from .errors import EncoderError

TEXT_DIM = 768
IMAGE_DIM = 2048
_IMAGE_PROJECTION_SEED = 20240501


class SeededTextEncoder:
    """768-d vector from a hash-seeded Gaussian draw per definition string."""

    dim = TEXT_DIM

    def encode(self, texts):
        rows = []
        for text in texts:
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
            rows.append(rng.standard_normal(self.dim))
        return np.stack(rows)


class SeededImageEncoder:
    """2048-d vector: 16x16 average pooling of the preprocessed block,
    then a fixed seeded random projection."""

    dim = IMAGE_DIM

    def __init__(self):
        rng = np.random.default_rng(_IMAGE_PROJECTION_SEED)
        self._projection = rng.standard_normal((768, self.dim)) / np.sqrt(768.0)

    def encode(self, blocks):
        rows = []
        for block in blocks:
            pooled = block.reshape(3, 16, 14, 16, 14).mean(axis=(2, 4))
            rows.append(pooled.reshape(-1) @ self._projection)
        return np.stack(rows)


class TransformerTextEncoder:
    """Pretrained bidirectional transformer; emits the pooled sentence vector.

    Definitions are padded to the model's maximum input length. Requires the
    weights to be available locally.
    """

    dim = TEXT_DIM

    def __init__(self, model_name="bert-base-chinese"):
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise EncoderError("transformers is not installed; "
                               "use the 'seeded' encoder or install extras") from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_name)
            self.model = AutoModel.from_pretrained(model_name).eval()
        except Exception as exc:
            raise EncoderError(
                f"pretrained weights for {model_name!r} are unavailable: {exc}") from exc

    def encode(self, texts):
        import torch

        with torch.no_grad():
            enc = self.tokenizer(list(texts), padding="max_length",
                                 truncation=True, return_tensors="pt")
            out = self.model(**enc)
        return out.pooler_output.double().numpy()


class ConvNetImageEncoder:
    """Pretrained 50-layer residual network; emits the 2048-d penultimate
    (pooled) features with the classification layer removed."""

    dim = IMAGE_DIM

    def __init__(self):
        try:
            import torch
            from torchvision import models
        except ImportError as exc:
            raise EncoderError("torchvision is not installed; "
                               "use the 'seeded' encoder or install extras") from exc
        try:
            net = models.resnet50(weights=models.ResNet50_Weights.IMAGENET1K_V2)
        except Exception as exc:
            raise EncoderError(
                f"pretrained image-encoder weights are unavailable: {exc}") from exc
        net.fc = torch.nn.Identity()
        self.model = net.eval()

    def encode(self, blocks):
        import torch

        with torch.no_grad():
            stacked = torch.from_numpy(np.stack(blocks)).float()
            out = self.model(stacked)
        return out.double().numpy()


def make_text_encoder(spec):
    if spec == "seeded":
        return SeededTextEncoder()
    if spec == "bert" or spec.startswith("bert:"):
        _, _, model = spec.partition(":")
        return TransformerTextEncoder(model or "bert-base-chinese")
    raise EncoderError(f"unknown text encoder {spec!r} (expected 'seeded' or 'bert[:model]')")


def make_image_encoder(spec):
    if spec == "seeded":
        return SeededImageEncoder()
    if spec == "resnet50":
        return ConvNetImageEncoder()
    raise EncoderError(f"unknown image encoder {spec!r} (expected 'seeded' or 'resnet50')")
