"""
Serializers for experiment configuration files
"""
import math

from django.conf import settings
from rest_framework import serializers

from chanmodel.models import PdpShape, Scenario
from core.exceptions import ConfigurationError
from harness.models import ExperimentConfig
from prefilters.models import Technique


def _setting(name):
    """Default read from settings.SIMULATION when the field is omitted"""
    return lambda: settings.SIMULATION[name]


class ChannelSectionSerializer(serializers.Serializer):
    """Scenario, CIR length and the array/user/correlation axes"""
    scenario = serializers.ChoiceField(choices=Scenario.choices)
    num_taps = serializers.IntegerField(
        min_value=1, default=_setting('NUM_TAPS')
    )
    sample_period = serializers.FloatField(
        min_value=0.0, default=_setting('SAMPLE_PERIOD_NS')
    )
    gamma = serializers.FloatField(min_value=0.0, default=_setting('GAMMA'))
    pdp_shape = serializers.ChoiceField(
        choices=PdpShape.choices, default=PdpShape.EXPONENTIAL
    )
    first_tap_fraction = serializers.FloatField(
        min_value=0.0, max_value=1.0, default=0.0
    )
    arrays = serializers.ListField(
        child=serializers.ListField(
            child=serializers.IntegerField(min_value=1),
            min_length=2,
            max_length=2,
        ),
        min_length=1,
    )
    users = serializers.ListField(
        child=serializers.IntegerField(min_value=1), min_length=1
    )
    correlated = serializers.ListField(
        child=serializers.BooleanField(),
        min_length=1,
        default=lambda: [False],
    )


class PrefilterSectionSerializer(serializers.Serializer):
    """Techniques and pre-filter lengths"""
    techniques = serializers.ListField(
        child=serializers.ChoiceField(choices=Technique.choices),
        min_length=1,
    )
    prefilter_lengths = serializers.ListField(
        child=serializers.IntegerField(min_value=1), min_length=1
    )
    equalizer_length = serializers.IntegerField(
        min_value=1, allow_null=True, default=None
    )
    reg_epsilon = serializers.FloatField(min_value=0.0, default=1e-12)


class LinkSectionSerializer(serializers.Serializer):
    """Transmit power, SNR grid and the BER symbol budget"""
    rho = serializers.FloatField(default=1.0)
    snr_grid_db = serializers.ListField(
        child=serializers.FloatField(), min_length=1
    )
    num_symbols = serializers.IntegerField(min_value=0, default=0)
    streaming = serializers.BooleanField(default=False)

    def validate_rho(self, value):
        if value <= 0:
            raise serializers.ValidationError('rho must be positive')
        return value

    def validate_snr_grid_db(self, value):
        if not all(math.isfinite(snr) for snr in value):
            raise serializers.ValidationError('SNR points must be finite')
        return value

    def validate_num_symbols(self, value):
        # 0 skips the BER simulation
        if 0 < value < 1000:
            raise serializers.ValidationError(
                'BER needs at least 1000 symbols'
            )
        return value


class RunSectionSerializer(serializers.Serializer):
    """Realization count, seed, output and worker pool"""
    num_realizations = serializers.IntegerField(min_value=1)
    master_seed = serializers.IntegerField(min_value=0, max_value=2**64 - 1)
    output_path = serializers.CharField(allow_blank=True, default='')
    workers = serializers.IntegerField(
        min_value=1, default=_setting('WORKERS')
    )


class ExperimentConfigSerializer(serializers.Serializer):
    """Serializer for a whole experiment configuration file"""

    channel = ChannelSectionSerializer(source='*')
    prefilter = PrefilterSectionSerializer(source='*')
    link = LinkSectionSerializer(source='*')
    run = RunSectionSerializer(source='*')

    def validate(self, attrs):
        """Check the combinations the per-field validators cannot see"""
        if attrs['gamma'] <= 0 or attrs['sample_period'] <= 0:
            raise serializers.ValidationError(
                'gamma and sample_period must be positive'
            )
        if not attrs['first_tap_fraction'] < 1:
            raise serializers.ValidationError(
                'first_tap_fraction must be below 1'
            )

        num_taps = attrs['num_taps']
        if min(attrs['prefilter_lengths']) < num_taps:
            raise serializers.ValidationError(
                f'pre-filter lengths must be at least L = {num_taps}'
            )

        if Technique.INTR in attrs['techniques']:
            smallest = min(rows * cols for rows, cols in attrs['arrays'])
            if smallest < max(attrs['users']):
                raise serializers.ValidationError(
                    f'INTR needs M >= N; the smallest array has {smallest} '
                    f'elements for {max(attrs["users"])} users'
                )

        sizes = [rows * cols for rows, cols in attrs['arrays']]
        if len(set(sizes)) != len(sizes):
            raise serializers.ValidationError(
                'arrays must have distinct element counts'
            )

        try:
            ExperimentConfig(**attrs).scenario_params()
        except ConfigurationError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs

    def create(self, validated_data):
        return ExperimentConfig(**validated_data)
