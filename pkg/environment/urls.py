from django.urls import path, include
from rest_framework.routers import DefaultRouter
from . import views

router = DefaultRouter()
router.register(r'environments', views.EnvironmentViewSet, basename='environment')

urlpatterns = [
    path('', include(router.urls)),
]
