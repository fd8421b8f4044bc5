from django.urls import path

from . import views

app_name = 'harness'

urlpatterns = [
    path('solve/', views.solve_view, name='solve'),
    path('compare/', views.compare_view, name='compare'),
]
