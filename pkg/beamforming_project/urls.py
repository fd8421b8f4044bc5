"""beamforming_project URL Configuration"""
from django.urls import path, include

urlpatterns = [
    path('api/', include('harness.urls')),
]
