from django.apps import AppConfig


class ContinuousConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'continuous'
    verbose_name = 'Continuous phase branch-and-bound'
