import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'beamforming_project.settings')
django.setup()
