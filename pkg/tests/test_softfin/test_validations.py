"""
Unit tests for `softfin.config.validations` module.
"""

import pytest

from softfin.config.core import field_spec
from softfin.config.validations import (
    is_in_choices,
    is_in_range,
    min_length,
    validate,
)


def _returning(value):
    def stub_function():
        return value

    return stub_function


class TestValidate:
    def test_Should_return_response_When_validation_passes(self):
        calls = []
        stub_function = validate(calls.append)(_returning("foo"))
        assert stub_function() == "foo"
        assert calls == ["foo"]

    def test_Should_wrap_error_with_method_name_When_validation_fails(self):
        def always_fails(_):
            raise ValueError("nope")

        stub_function = validate(always_fails)(_returning(1))
        with pytest.raises(ValueError) as e:
            stub_function()
        assert str(e.value) == 'Validation failed for "stub_function" method.'
        assert str(e.value.__cause__) == "nope"

    def test_Should_register_callback_on_field_When_decorating(self):
        stub_function = _returning(1)
        validate(print)(stub_function)
        assert field_spec(stub_function).validations == [print]

    # noinspection PyTypeChecker
    def test_Should_raise_type_error_When_callback_is_not_callable(self):
        with pytest.raises(TypeError):
            validate(1)


@pytest.mark.parametrize(
    "value, left_inclusive, right_inclusive, valid",
    [
        (0.0, True, True, True),
        (0.0, False, True, False),
        (1.0, True, True, True),
        (1.0, True, False, False),
        (0.5, False, False, True),
        (-0.1, True, True, False),
        (1.1, True, True, False),
    ],
)
def test_Should_check_bounds_When_is_in_range_is_used(
    value, left_inclusive, right_inclusive, valid
):
    stub_function = is_in_range(0.0, 1.0, left_inclusive, right_inclusive)(
        _returning(value)
    )
    if valid:
        assert stub_function() == value
    else:
        with pytest.raises(ValueError):
            stub_function()


def test_Should_skip_missing_bound_When_bound_is_none():
    assert is_in_range(1, None)(_returning(10**9))() == 10**9
    assert is_in_range(None, 1)(_returning(-(10**9)))() == -(10**9)


def test_Should_accept_only_choices_When_is_in_choices_is_used():
    assert is_in_choices({"sample", "mean"})(_returning("mean"))() == "mean"
    with pytest.raises(ValueError):
        is_in_choices({"sample", "mean"})(_returning("greedy"))()


def test_Should_require_length_When_min_length_is_used():
    assert min_length(2)(_returning([1, 2]))() == [1, 2]
    with pytest.raises(ValueError):
        min_length(2)(_returning([1]))()
