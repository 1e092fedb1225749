from dnsgt.mixins import CoolNameable
from tests.base import BaseTestCase


class NamedThing(CoolNameable):
    def __init__(self, name, *args, **kwargs):
        self.name = name
        super().__init__(*args, **kwargs)


class TestCoolNameable(BaseTestCase):
    def test_name_has_two_components(self):
        """Test that the cool name is in the format of <word>-<word>."""
        self.assertEqual(len(CoolNameable().name.split("-")), 2)

    def test_names_are_different(self):
        """Test that the cool names of different instances are different."""
        self.assertEqual(len({CoolNameable().name for _ in range(5)}), 5)

    def test_existing_name_is_kept(self):
        """Test that an existing name attribute or name keyword argument is not replaced."""
        self.assertEqual(NamedThing(name="run-one").name, "run-one")
        self.assertEqual(CoolNameable(name="run-two").name, "run-two")

    def test_cool_name_replaces_missing_name(self):
        """Test that a cool name is applied if the existing name attribute is `None`."""
        named_thing = NamedThing(name=None)
        self.assertEqual(len(named_thing.name.split("-")), 2)
        self.assertTrue(named_thing._cool_named)
