from django.apps import AppConfig


class DspcoreConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'dspcore'
