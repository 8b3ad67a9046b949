"""HTTP classification service around a trained classifier bundle."""

from fcmdetect.service.app import create_app

__all__ = ["create_app"]
