from django.urls import reverse
from rest_framework import permissions, viewsets
from rest_framework.decorators import api_view, permission_classes
from rest_framework.pagination import PageNumberPagination
from rest_framework.response import Response

from .experiments import EXPERIMENTS
from .models import ExperimentRun
from .permissions import IsSuperuserOrReadOnly
from .serializers import ExperimentRunListSerializer, ExperimentRunSerializer


class RunPagination(PageNumberPagination):
    """
    Runs are listed 10 per page.
    """
    page_size = 10
    page_size_query_param = 'page_size'
    max_page_size = 100


class ExperimentRunViewSet(viewsets.ReadOnlyModelViewSet):
    """
    Recorded experiment runs, newest first.
    Filter with ?kind=<experiment> and ?status=<succeeded|failed>.
    """
    permission_classes = [permissions.IsAuthenticated, IsSuperuserOrReadOnly]
    pagination_class = RunPagination

    def get_queryset(self):
        queryset = ExperimentRun.objects.all()
        kind = self.request.query_params.get('kind')
        if kind:
            queryset = queryset.filter(kind=kind.strip())
        status = self.request.query_params.get('status')
        if status:
            queryset = queryset.filter(status=status.strip())
        return queryset

    def get_serializer_class(self):
        if self.action == 'list':
            return ExperimentRunListSerializer
        return ExperimentRunSerializer


@api_view(['GET'])
@permission_classes([permissions.AllowAny])
def api_root(request):
    """
    API Root view that shows all available endpoints.
    Public endpoint - no authentication required.
    """
    return Response({
        'message': 'Quenched zero range process API',
        'version': '1.0.0',
        'endpoints': {
            'environments': request.build_absolute_uri(reverse('environment-list')),
            'runs': request.build_absolute_uri(reverse('run-list')),
        },
        'experiments': list(EXPERIMENTS),
        'documentation': {
            'swagger': request.build_absolute_uri(reverse('swagger-ui')),
            'redoc': request.build_absolute_uri(reverse('redoc')),
            'schema': request.build_absolute_uri(reverse('schema')),
        },
    })
