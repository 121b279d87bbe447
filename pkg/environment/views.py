import logging

from rest_framework import permissions, status, viewsets, mixins
from rest_framework.decorators import action
from rest_framework.response import Response

from core import constants
from core.exceptions import InvalidWindowError
from core.permissions import IsSuperuserOrReadOnly

from .ladder import validate_environment
from .models import EnvironmentRecord
from .serializers import (
    EnvironmentCreateSerializer,
    EnvironmentRecordSerializer,
    TileSerializer,
)
from .tiles import census_proportions, decompose_tiles, shape_census

logger = logging.getLogger(__name__)


class EnvironmentViewSet(mixins.CreateModelMixin,
                         mixins.DestroyModelMixin,
                         viewsets.ReadOnlyModelViewSet):
    """
    Stored quenched environments.
    Creating one either generates it from n/p/seed or stores explicit figures.
    """
    queryset = EnvironmentRecord.objects.all()
    permission_classes = [permissions.IsAuthenticated, IsSuperuserOrReadOnly]

    def get_serializer_class(self):
        if self.action == 'create':
            return EnvironmentCreateSerializer
        return EnvironmentRecordSerializer

    def create(self, request, *args, **kwargs):
        serializer = self.get_serializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        record = serializer.save()
        logger.info("stored environment %s (n=%d)", record.digest[:10], record.n)

        # Return the stored record, not the generation parameters
        response_serializer = EnvironmentRecordSerializer(record)
        headers = self.get_success_headers(response_serializer.data)
        return Response(response_serializer.data, status=status.HTTP_201_CREATED, headers=headers)

    @action(detail=True, methods=['get'])
    def decomposition(self, request, pk=None):
        """
        Tiles of the environment with T_N and kappa_N.
        """
        decomp = decompose_tiles(self.get_object().to_environment())
        return Response({
            't_n': decomp.t_n,
            'kappa_n': decomp.kappa_n,
            'tiles': TileSerializer(decomp.tiles, many=True).data,
        })

    @action(detail=True, methods=['get'])
    def census(self, request, pk=None):
        """
        Shape census for the half-window given by ?l= (default 1).
        """
        raw = request.query_params.get('l', '1')
        try:
            l = int(raw)
        except ValueError:
            raise InvalidWindowError(constants.HALF_WINDOW_INVALID.format(l=raw)) from None
        decomp = decompose_tiles(self.get_object().to_environment())
        counts = shape_census(decomp, l)
        return Response({
            'l': l,
            'counts': {str(m): c for m, c in counts.items()},
            'proportions': {str(m): p for m, p in census_proportions(counts).items()},
        })

    @action(detail=True, methods=['get'])
    def validation(self, request, pk=None):
        report = validate_environment(self.get_object().to_environment())
        return Response({
            'is_valid': report.is_valid,
            'violations': [
                {'kind': v.kind, 'location': v.location, 'message': v.message}
                for v in report.violations
            ],
        })
