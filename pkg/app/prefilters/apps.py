from django.apps import AppConfig


class PrefiltersConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'prefilters'
