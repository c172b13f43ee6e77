from django.apps import AppConfig


class ChanmodelConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'chanmodel'
