"""
Loading, dumping and overriding experiment configuration files.
"""
import logging
from dataclasses import replace
from pathlib import Path

import yaml
from rest_framework import serializers

from core.exceptions import ConfigurationError
from harness.serializers import ExperimentConfigSerializer

logger = logging.getLogger(__name__)

PRESET_DIR = Path(__file__).resolve().parent / 'presets'


def _plain(value):
    """Turn serializer output (OrderedDicts, tuples) into YAML-safe types"""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def _flatten_errors(detail, prefix=''):
    """DRF error detail as 'section.field: message' lines"""
    if isinstance(detail, dict):
        lines = []
        for key, item in detail.items():
            name = key if key != 'non_field_errors' else ''
            lines.extend(_flatten_errors(
                item, f'{prefix}.{name}' if prefix and name else prefix or name
            ))
        return lines
    if isinstance(detail, list):
        lines = []
        for item in detail:
            lines.extend(_flatten_errors(item, prefix))
        return lines
    return [f'{prefix}: {detail}' if prefix else str(detail)]


def config_from_data(data):
    """Validate a parsed config mapping into an ExperimentConfig"""
    if not isinstance(data, dict):
        raise ConfigurationError('a config file must hold a mapping')
    serializer = ExperimentConfigSerializer(data=data)
    try:
        serializer.is_valid(raise_exception=True)
    except serializers.ValidationError as exc:
        raise ConfigurationError(
            'invalid config: ' + '; '.join(_flatten_errors(exc.detail))
        ) from exc
    return serializer.save()


def load_config(path):
    """Read and validate a YAML config file"""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigurationError(f'cannot read config {path}: {exc}') \
            from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f'{path} is not valid YAML: {exc}') \
            from exc
    return config_from_data(data)


def preset_path(name):
    path = PRESET_DIR / f'{name}.yaml'
    if not path.is_file():
        available = sorted(p.stem for p in PRESET_DIR.glob('*.yaml'))
        raise ConfigurationError(
            f'unknown preset {name!r}; available: {", ".join(available)}'
        )
    return path


def load_preset(name):
    """Load one of the shipped presets by name"""
    return load_config(preset_path(name))


def dump_config(config):
    """YAML text of a config; loading it back gives an equal config"""
    data = _plain(ExperimentConfigSerializer(config).data)
    return yaml.safe_dump(data, sort_keys=False)


def apply_overrides(config, **overrides):
    """
    Replace config values given on the command line.

    None means "not given". The result is validated again.
    """
    changes = {k: v for k, v in overrides.items() if v is not None}
    if not changes:
        return config
    updated = replace(config, **changes)
    return config_from_data(yaml.safe_load(dump_config(updated)))
