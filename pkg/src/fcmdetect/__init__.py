"""Compression-based detector for machine-generated text.

Trains one order-k finite-context model per text class and labels new text
by whichever class model encodes it in fewer bits.
"""

__version__ = "0.1.0"

from fcmdetect.alphabet import Alphabet, custom_alphabet, filter_text, preset_alphabet
from fcmdetect.classifier import BinaryClassifier, Decision
from fcmdetect.fcm import ContextModel

__all__ = [
    "Alphabet",
    "BinaryClassifier",
    "ContextModel",
    "Decision",
    "custom_alphabet",
    "filter_text",
    "preset_alphabet",
    "__version__",
]
