"""
DRF exception handler: simulator errors become JSON bodies with the same
``error``/``message`` keys the API uses everywhere else.
"""
from rest_framework import status
from rest_framework.response import Response
from rest_framework.views import exception_handler

from .constants import ERROR_KEY, MESSAGE_KEY
from .exceptions import ValidationFailure, ZRPError


def zrp_exception_handler(exc, context):
    if isinstance(exc, ZRPError):
        code = (
            status.HTTP_400_BAD_REQUEST
            if isinstance(exc, ValidationFailure)
            else status.HTTP_422_UNPROCESSABLE_ENTITY
        )
        body = {ERROR_KEY: type(exc).__name__, MESSAGE_KEY: str(exc)}
        report = getattr(exc, 'report', None)
        if report is not None:
            body['violations'] = report.messages()
        return Response(body, status=code)
    return exception_handler(exc, context)
