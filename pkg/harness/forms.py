from django import forms

from problem.conf import beam_setting
from problem.exceptions import ContractViolation

from .runner import (
    DEFAULT_CONTINUOUS_MAX_N,
    DEFAULT_GRID_STEPS,
    DEFAULT_K_VALUES,
    DEFAULT_MODE_TAGS,
    DEFAULT_N_VALUES,
    DEFAULT_SWEEP_SEED,
    DEFAULT_TRIALS,
    Mode,
    SweepConfig,
    dbm_to_linear,
)


def resolve_power(cleaned_data, default=None):
    """Pick the linear power from exactly one of power_linear / power_dbm."""
    linear = cleaned_data.get('power_linear')
    dbm = cleaned_data.get('power_dbm')
    if linear is not None and dbm is not None:
        raise forms.ValidationError('Give either power_linear or power_dbm, not both.')
    if dbm is not None:
        return dbm_to_linear(dbm)
    if linear is not None:
        if not linear > 0:
            raise forms.ValidationError('power_linear must be positive.')
        return linear
    return default


class SolveOptionsForm(forms.Form):
    """Options shared by the solve command and the solve API."""

    mode = forms.CharField(help_text='binary, mary, continuous, or ao-*/oracle-* variants')
    m = forms.IntegerField(required=False, min_value=2)
    epsilon = forms.FloatField(required=False)
    power_linear = forms.FloatField(required=False)
    power_dbm = forms.FloatField(required=False)

    def clean_epsilon(self):
        epsilon = self.cleaned_data.get('epsilon')
        if epsilon is not None and not epsilon > 0:
            raise forms.ValidationError('epsilon must be positive.')
        return epsilon

    def clean(self):
        cleaned_data = super().clean()
        mode = cleaned_data.get('mode')
        if mode:
            try:
                cleaned_data['mode'] = Mode.parse(mode, cleaned_data.get('m'))
            except (ContractViolation, ValueError) as exc:
                self.add_error('mode', str(exc))
        cleaned_data['power'] = resolve_power(cleaned_data)
        return cleaned_data


class CompareOptionsForm(forms.Form):
    """BB against AO on one phase class; no m means continuous phases."""

    m = forms.IntegerField(required=False, min_value=2)
    epsilon = forms.FloatField(required=False)
    power_linear = forms.FloatField(required=False)
    power_dbm = forms.FloatField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        m = cleaned_data.get('m')
        tag = 'continuous' if m is None else 'mary'
        cleaned_data['modes'] = (Mode.parse(tag, m), Mode.parse(f'ao-{tag}', m))
        cleaned_data['power'] = resolve_power(cleaned_data)
        epsilon = cleaned_data.get('epsilon')
        if epsilon is not None and not epsilon > 0:
            self.add_error('epsilon', 'epsilon must be positive.')
        return cleaned_data


class SweepConfigForm(forms.Form):
    """Validates a sweep configuration; omitted fields take the default sweep's values."""

    seed = forms.IntegerField(required=False, min_value=0)
    trials = forms.IntegerField(required=False, min_value=1)
    N_values = forms.JSONField(required=False)
    K_values = forms.JSONField(required=False)
    modes = forms.JSONField(required=False)
    power_linear = forms.FloatField(required=False)
    power_dbm = forms.FloatField(required=False)
    sigma2 = forms.FloatField(required=False)
    epsilon = forms.FloatField(required=False)
    grid_steps = forms.IntegerField(required=False, min_value=1)
    continuous_max_N = forms.IntegerField(required=False, min_value=1)

    def _clean_counts(self, name, default):
        values = self.cleaned_data.get(name)
        if values is None and self.data.get(name) is None:
            return list(default)
        if not isinstance(values, list) or not values:
            raise forms.ValidationError(f'{name} must be a nonempty list of positive integers.')
        if any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in values):
            raise forms.ValidationError(f'{name} must be a nonempty list of positive integers.')
        return values

    def clean_N_values(self):
        return self._clean_counts('N_values', DEFAULT_N_VALUES)

    def clean_K_values(self):
        return self._clean_counts('K_values', DEFAULT_K_VALUES)

    def clean_modes(self):
        tags = self.cleaned_data.get('modes')
        if tags is None and self.data.get('modes') is None:
            tags = list(DEFAULT_MODE_TAGS)
        if not isinstance(tags, list) or not tags:
            raise forms.ValidationError('modes must be a nonempty list such as ["binary", "ao-mary4"].')
        modes = []
        for tag in tags:
            try:
                modes.append(Mode.parse(str(tag)))
            except (ContractViolation, ValueError) as exc:
                raise forms.ValidationError(f'Invalid mode {tag!r}: {exc}')
        return modes

    def clean_sigma2(self):
        sigma2 = self.cleaned_data.get('sigma2')
        if sigma2 is not None and not sigma2 > 0:
            raise forms.ValidationError('sigma2 must be positive.')
        return sigma2

    def clean_epsilon(self):
        epsilon = self.cleaned_data.get('epsilon')
        if epsilon is not None and not epsilon > 0:
            raise forms.ValidationError('epsilon must be positive.')
        return epsilon

    def clean(self):
        cleaned_data = super().clean()
        cleaned_data['power'] = resolve_power(cleaned_data, default=beam_setting('DEFAULT_POWER'))
        return cleaned_data

    def to_config(self) -> SweepConfig:
        data = self.cleaned_data

        def pick(name, default):
            return default if data.get(name) is None else data[name]

        return SweepConfig(
            seed=pick('seed', DEFAULT_SWEEP_SEED),
            trials=pick('trials', DEFAULT_TRIALS),
            N_values=tuple(data['N_values']),
            K_values=tuple(data['K_values']),
            modes=tuple(data['modes']),
            power=data['power'],
            sigma2=pick('sigma2', beam_setting('NOISE_POWER')),
            epsilon=pick('epsilon', beam_setting('EPSILON')),
            grid_steps=pick('grid_steps', DEFAULT_GRID_STEPS),
            continuous_max_N=pick('continuous_max_N', DEFAULT_CONTINUOUS_MAX_N),
        )
