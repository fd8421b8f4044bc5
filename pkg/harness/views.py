import logging

from rest_framework import status
from rest_framework.decorators import api_view
from rest_framework.response import Response

from problem.exceptions import BeamformingError

from .forms import CompareOptionsForm, SolveOptionsForm
from .runner import SolveParams, compare_modes, solve
from .serializers import ChannelFileSerializer, SolutionSerializer, finite_or_inf

logger = logging.getLogger('beamforming')


def _channels_or_errors(request):
    serializer = ChannelFileSerializer(data=request.data.get('channels'))
    if serializer.is_valid():
        return serializer.save(), None
    return None, serializer.errors


@api_view(['POST'])
def solve_view(request):
    """
    Solve one instance: {"channels": <channel file>, "mode": ..., "m", "epsilon",
    "power_linear" | "power_dbm"}.
    """
    ch, channel_errors = _channels_or_errors(request)
    form = SolveOptionsForm(request.data)
    if channel_errors or not form.is_valid():
        errors = dict(form.errors)
        if channel_errors:
            errors['channels'] = channel_errors
        return Response({'success': False, 'errors': errors}, status=status.HTTP_400_BAD_REQUEST)

    try:
        params = SolveParams.from_options(form.cleaned_data['power'], form.cleaned_data['epsilon'])
        solution = solve(ch, form.cleaned_data['mode'], params)
    except BeamformingError as e:
        logger.error(f"Solve API failed: {e}")
        return Response({'success': False, 'error': str(e)}, status=status.HTTP_422_UNPROCESSABLE_ENTITY)

    return Response({'success': True, 'solution': SolutionSerializer(solution).data})


@api_view(['POST'])
def compare_view(request):
    """BB against AO on the same channels, with the relative gap of AO."""
    ch, channel_errors = _channels_or_errors(request)
    form = CompareOptionsForm(request.data)
    if channel_errors or not form.is_valid():
        errors = dict(form.errors)
        if channel_errors:
            errors['channels'] = channel_errors
        return Response({'success': False, 'errors': errors}, status=status.HTTP_400_BAD_REQUEST)

    try:
        params = SolveParams.from_options(form.cleaned_data['power'], form.cleaned_data['epsilon'])
        exact, heuristic = form.cleaned_data['modes']
        comparison = compare_modes(ch, exact, heuristic, params)
    except BeamformingError as e:
        logger.error(f"Compare API failed: {e}")
        return Response({'success': False, 'error': str(e)}, status=status.HTTP_422_UNPROCESSABLE_ENTITY)

    return Response({
        'success': True,
        'bb': SolutionSerializer(comparison.exact).data,
        'ao': SolutionSerializer(comparison.heuristic).data,
        'relative_gap': finite_or_inf(comparison.relative_gap),
    })
