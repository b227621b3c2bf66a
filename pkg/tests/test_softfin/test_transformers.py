"""
Test cases for softfin.config.transformer module.
"""

from unittest.mock import MagicMock

import pytest

from softfin.config import field
from softfin.config.core import field_spec
from softfin.config.transformer import (
    cast_datatype,
    float_list,
    float_pairs,
    floating,
    int_list,
    integer,
    string,
    transform,
)


class TestTransform:
    def test_Should_return_the_response_of_transformer_When_decorated_with_transformer(
        self,
    ):
        transformer_stub = MagicMock()
        response = MagicMock()

        @transform(transformer_stub)
        def stub_function():
            return response

        assert stub_function() == transformer_stub.return_value
        transformer_stub.assert_called_once_with(response)

    # noinspection PyTypeChecker
    def test_Should_raise_type_error_When_transformer_is_not_callable(self):
        with pytest.raises(TypeError) as e:
            transform(1)(lambda: None)
        assert str(e.value) == "Callback must be a callable."

        with pytest.raises(TypeError) as e:
            transform(None)(lambda: None)
        assert str(e.value) == "Callback is required."

    def test_Should_register_callbacks_in_application_order_When_stacked(self):
        @floating()
        @string()
        @field(name="stub")
        def stub_function():
            return 3

        callbacks = field_spec(stub_function).transforms
        assert len(callbacks) == 2
        assert stub_function() == 3.0


@pytest.mark.parametrize(
    "datatype, response, expected_response, cast_null",
    [
        (int, "1", 1, False),
        (str, 1, "1", False),
        (float, "0.5", 0.5, False),
        (str, None, None, False),
        (str, None, "None", True),
    ],
)
def test_Should_cast_response_When_cast_datatype_is_used(
    datatype, response, expected_response, cast_null
):
    @cast_datatype(datatype, cast_null=cast_null)
    def stub_function():
        return response

    assert stub_function() == expected_response


@pytest.mark.parametrize(
    "decorator, response, expected_response",
    [
        (integer, "7", 7),
        (integer, 7.0, 7),
        (floating, "1e-3", 0.001),
        (floating, 2, 2.0),
        (string, 0, "0"),
    ],
)
def test_Should_cast_response_When_typed_transformer_is_used(
    decorator, response, expected_response
):
    @decorator()
    def stub_function():
        return response

    assert stub_function() == expected_response


class TestFloatList:
    @pytest.mark.parametrize(
        "response, expected_response",
        [
            ("0,1,2", [0.0, 1.0, 2.0]),
            (" 3 ", [3.0]),
            ("", []),
            ((1, 2), [1.0, 2.0]),
            (b"4,5", [4.0, 5.0]),
        ],
    )
    def test_Should_read_numbers_When_value_is_comma_separated(
        self, response, expected_response
    ):
        @float_list()
        def stub_function():
            return response

        assert stub_function() == expected_response

    def test_Should_be_idempotent_When_applied_twice(self):
        @float_list()
        @float_list()
        def stub_function():
            return "0,1"

        assert stub_function() == [0.0, 1.0]


class TestFloatPairs:
    @pytest.mark.parametrize(
        "response, expected_response",
        [
            ("1,-1;2,0", [(1.0, -1.0), (2.0, 0.0)]),
            ("1,-1;", [(1.0, -1.0)]),
            ([(3, 0)], [(3.0, 0.0)]),
        ],
    )
    def test_Should_read_pairs_When_value_is_semicolon_separated(
        self, response, expected_response
    ):
        @float_pairs()
        def stub_function():
            return response

        assert stub_function() == expected_response

    @pytest.mark.parametrize("response", ["1,2,3", "1", "1,2;3"])
    def test_Should_raise_value_error_When_entry_is_not_a_pair(self, response):
        @float_pairs()
        def stub_function():
            return response

        with pytest.raises(ValueError):
            stub_function()


class TestIntList:
    @pytest.mark.parametrize(
        "response, expected_response",
        [
            ("0,1,2", [0, 1, 2]),
            (" 7 ", [7]),
            ("", []),
            ((3.0, 4), [3, 4]),
        ],
    )
    def test_Should_read_whole_numbers_When_value_is_comma_separated(
        self, response, expected_response
    ):
        @int_list()
        def stub_function():
            return response

        assert stub_function() == expected_response

    @pytest.mark.parametrize("response", ["0,1.7", "one", (1.5,)])
    def test_Should_raise_value_error_When_entry_is_not_whole(self, response):
        @int_list()
        def stub_function():
            return response

        with pytest.raises(ValueError, match="not a whole number"):
            stub_function()
