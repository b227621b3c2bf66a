"""
Unit tests for the `softfin.config` module
"""

from unittest.mock import MagicMock

import pytest

import softfin.config
from softfin.config import (
    MappingAdapter,
    add_adapter,
    config,
    field,
    field_names,
    optional,
    reset_cache,
    use_adapters,
)
from softfin.config.core import AdapterBase, AdapterError, field_spec, has_field_spec
from softfin.config.transformer import floating, integer
from softfin.config.validations import is_in_range


@pytest.mark.parametrize(
    "import_name",
    [
        "field",
        "optional",
        "add_adapter",
        "reset_cache",
        "use_adapters",
        "field_names",
        "config",
        "EnvAdapter",
        "KeyValueFileAdapter",
        "MappingAdapter",
    ],
)
def test_Should_have_expected_field_When_config_is_imported(import_name):
    assert hasattr(softfin.config, import_name)


class StubAdapter(AdapterBase):
    def __init__(self, values):
        self.values = dict(values)
        self.calls = 0

    def get_field(self, field_name, method, *_, **__):
        self.calls += 1
        if field_name not in self.values:
            raise AdapterError(f"{field_name} missing")
        return self.values[field_name]


# noinspection PyArgumentList,PyTypeChecker
class TestField:
    # pylint: disable=no-value-for-parameter
    def test_Should_raise_type_error_When_name_is_none_or_missing(self):
        with pytest.raises(TypeError) as e:
            field()(lambda: None)
        assert str(e.value) == "field() missing 1 required positional argument: 'name'"

        with pytest.raises(TypeError) as e:
            field(None)(lambda: None)
        assert str(e.value) == "Name is required."

    def test_Should_set_attribute_name_When_field_is_called(self):
        @field("plant_c_n")
        def stub_field():
            """Stub"""

        assert has_field_spec(stub_field) is True
        assert field_spec(stub_field).name == "plant_c_n"
        assert field_spec(stub_field).adapters is None

    def test_Should_return_same_function_When_field_is_called(self):
        mock = MagicMock()
        assert field("seed")(mock) == mock


# noinspection PyTypeChecker
class TestOptional:
    def test_Should_return_false_When_optional_is_not_set(self):
        @field(name="stub")
        def stub_field():
            """Stub"""

        assert field_spec(stub_field).optional is False

    @pytest.mark.parametrize("value", [True, False])
    def test_Should_store_flag_When_optional_is_called(self, value):
        @optional(value)
        @field(name="stub")
        def stub_field():
            """Stub"""

        assert field_spec(stub_field).optional is value

    def test_Should_raise_type_error_When_flag_is_not_boolean(self):
        with pytest.raises(TypeError):
            optional("yes")


class TestAddAdapter:
    def test_Should_prefer_field_adapter_When_both_levels_have_the_field(self):
        field_adapter = StubAdapter({"seed": "7"})

        @config([StubAdapter({"seed": "3"})])
        class Settings:
            @integer()
            @add_adapter(field_adapter)
            @field(name="seed")
            def seed(self) -> int:
                return 0

        assert Settings().seed() == 7

    def test_Should_raise_type_error_When_adapter_has_no_get_field(self):
        with pytest.raises(TypeError):
            add_adapter(object())

        with pytest.raises(TypeError):
            add_adapter(None)


class TestConfig:
    def test_Should_use_first_adapter_that_has_the_field_When_adapters_are_chained(
        self,
    ):
        first = StubAdapter({})
        second = StubAdapter({"plant_c_n": "0.5"})

        @config([first, second])
        class Settings:
            @floating()
            @field(name="plant_c_n")
            def c_n(self) -> float:
                return 0.8

        assert Settings().c_n() == 0.5
        assert first.calls == 1

    def test_Should_raise_value_error_When_field_is_missing_and_defaults_are_off(self):
        @config([StubAdapter({})])
        class Settings:
            @field(name="seed")
            def seed(self) -> str:
                return "0"

        with pytest.raises(ValueError) as e:
            Settings().seed()
        assert str(e.value) == "Field seed not found in any config."

    def test_Should_return_default_When_field_is_missing_and_defaults_are_on(self):
        @config([StubAdapter({})], use_defaults=True)
        class Settings:
            @floating()
            @field(name="plant_tau")
            def tau(self) -> float:
                return 0.06

        assert Settings().tau() == 0.06

    def test_Should_return_default_When_optional_field_is_missing(self):
        @config([StubAdapter({})])
        class Settings:
            @optional()
            @field(name="out")
            def out(self) -> str:
                return "softfin-out"

        assert Settings().out() == "softfin-out"

    def test_Should_transform_adapter_strings_When_field_has_transformer(self):
        @config([StubAdapter({"ppo_epochs": "8"})])
        class Settings:
            @integer()
            @field(name="ppo_epochs")
            def epochs(self) -> int:
                return 4

        value = Settings().epochs()
        assert value == 8
        assert isinstance(value, int)

    def test_Should_name_field_When_adapter_value_fails_validation(self):
        @config([StubAdapter({"surrogate_dropout": "1.5"})])
        class Settings:
            @is_in_range(0.0, 1.0, right_inclusive=False)
            @floating()
            @field(name="surrogate_dropout")
            def dropout(self) -> float:
                return 0.2

        with pytest.raises(ValueError) as e:
            Settings().dropout()
        assert "surrogate_dropout" in str(e.value)

    def test_Should_name_field_When_adapter_value_cannot_be_parsed(self):
        @config([StubAdapter({"ppo_epochs": "four"})])
        class Settings:
            @integer()
            @field(name="ppo_epochs")
            def epochs(self) -> int:
                return 4

        with pytest.raises(ValueError, match="Invalid value for field ppo_epochs"):
            Settings().epochs()

    def test_Should_cache_value_When_field_is_read_twice(self):
        adapter = StubAdapter({"seed": "1"})

        @config([adapter])
        class Settings:
            @field(name="seed")
            def seed(self) -> str:
                return "0"

        settings = Settings()
        assert settings.seed() == "1"
        adapter.values["seed"] = "2"
        assert settings.seed() == "1"
        assert adapter.calls == 1

        reset_cache(settings)
        assert settings.seed() == "2"

    def test_Should_keep_docstring_of_getter_When_class_is_decorated(self):
        @config([StubAdapter({})], use_defaults=True)
        class Settings:
            @field(name="seed")
            def seed(self) -> str:
                """Run seed."""
                return "0"

        assert Settings.seed.__doc__ == "Run seed."

    def test_Should_read_prefixed_environment_When_adapters_are_not_given(
        self, monkeypatch
    ):
        monkeypatch.setenv("SOFTFIN_SEED", "42")

        @config()
        class Settings:
            @field(name="seed")
            def seed(self) -> str:
                return "0"

        assert Settings().seed() == "42"


class TestUseAdapters:
    def test_Should_prefer_instance_adapters_When_set_on_an_instance(self):
        @config([StubAdapter({"seed": "1"})])
        class Settings:
            @field(name="seed")
            def seed(self) -> str:
                return "0"

        settings = Settings()
        assert settings.seed() == "1"
        use_adapters(settings, MappingAdapter({"seed": "9"}))
        assert settings.seed() == "9"
        assert Settings().seed() == "1"

    def test_Should_fall_through_When_override_is_none(self):
        @config([StubAdapter({"seed": "1"})])
        class Settings:
            @field(name="seed")
            def seed(self) -> str:
                return "0"

        settings = use_adapters(Settings(), MappingAdapter({"seed": None}))
        assert settings.seed() == "1"

    def test_Should_raise_type_error_When_adapter_has_no_get_field(self):
        with pytest.raises(TypeError):
            use_adapters(object(), object())


def test_Should_list_fields_in_declaration_order_When_field_names_is_called():
    @config([StubAdapter({})], use_defaults=True)
    class Settings:
        @field(name="seed")
        def seed(self) -> str:
            return "0"

        def helper(self):
            return None

        @field(name="out")
        def out_dir(self) -> str:
            return "softfin-out"

    assert field_names(Settings) == {"seed": "seed", "out": "out_dir"}


class TestFieldSpec:
    def test_Should_share_one_spec_When_decorators_are_stacked(self):
        @is_in_range(0, None)
        @integer()
        @field(name="ppo_epochs")
        def epochs():
            return "4"

        spec = field_spec(epochs)
        assert spec.name == "ppo_epochs"
        assert len(spec.transforms) == 1
        assert len(spec.validations) == 1
        assert spec.resolve("6") == 6

    def test_Should_try_last_added_adapter_first_When_adapters_are_stacked(self):
        first, second = StubAdapter({}), StubAdapter({})

        @add_adapter(first)
        @add_adapter(second)
        @field(name="seed")
        def seed():
            return "0"

        assert field_spec(seed).adapters == [first, second]

    def test_Should_raise_When_spec_is_required_but_missing(self):
        with pytest.raises(ValueError, match="@field"):
            field_spec(lambda: None, create=False)
