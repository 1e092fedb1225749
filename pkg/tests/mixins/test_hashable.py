import numpy as np

from dnsgt.mixins import Hashable
from dnsgt.mixins.hashable import EMPTY_STRING_HASH_VALUE
from tests.base import BaseTestCase


class EmptyClass:
    pass


class TypeWithNoAttributesToHash(Hashable):
    pass


class TypeWithAttributeToHash(Hashable):
    _ATTRIBUTES_TO_HASH = ("a",)
    a = 7


class TypeWithIterable(Hashable):
    _ATTRIBUTES_TO_HASH = ("my_iterable",)

    def __init__(self, my_iterable):
        self.my_iterable = my_iterable
        super().__init__()


class HashableTestCase(BaseTestCase):
    def test_no_attributes_to_hash_results_in_trivial_hash_value(self):
        """Assert classes with Hashable mixed in but no attributes to hash have a trivial hash value."""
        self.assertEqual(TypeWithNoAttributesToHash().hash_value, EMPTY_STRING_HASH_VALUE)

    def test_non_hashable_type_results_in_type_error(self):
        """Ensure trying to hash unhashable attributes results in a TypeError."""
        with self.assertRaises(TypeError):
            TypeWithIterable(EmptyClass()).hash_value

    def test_lists_are_hashed_in_order(self):
        """Test that the order of a list changes its hash while the order of a set or a dictionary doesn't."""
        self.assertNotEqual(TypeWithIterable(["a", "b"]).hash_value, TypeWithIterable(["b", "a"]).hash_value)
        self.assertEqual(TypeWithIterable({"a", "b"}).hash_value, TypeWithIterable({"b", "a"}).hash_value)
        self.assertEqual(
            TypeWithIterable({"a": 1, "b": 2}).hash_value, TypeWithIterable({"b": 2, "a": 1}).hash_value
        )

    def test_arrays_are_hashed_by_content(self):
        """Test that numpy arrays with equal contents have equal hashes."""
        self.assertEqual(
            TypeWithIterable(np.arange(4.0)).hash_value, TypeWithIterable(np.array([0.0, 1.0, 2.0, 3.0])).hash_value
        )
        self.assertNotEqual(TypeWithIterable(np.arange(4.0)).hash_value, TypeWithIterable(np.ones(4)).hash_value)

    def test_nested_hashables_contribute_their_hash(self):
        """Test that attributes with a hash value are hashed by that value."""
        self.assertEqual(
            TypeWithIterable([TypeWithAttributeToHash()]).hash_value,
            TypeWithIterable([TypeWithAttributeToHash().hash_value]).hash_value,
        )

    def test_hash_non_class_object(self):
        """Test that arbitrary objects can be hashed without defining a class."""
        self.assertEqual(Hashable.hash_non_class_object([1, 2]), TypeWithIterable([1, 2]).hash_value)

    def test_set_and_reset_hash_value(self):
        """Test that hash values can be set and then reset to the calculated value."""
        type_with_hash = TypeWithAttributeToHash()
        original_calculated_hash = type_with_hash.hash_value
        self.assertEqual(len(original_calculated_hash), 8)

        type_with_hash.hash_value = "hello"
        self.assertEqual(type_with_hash.hash_value, "hello")

        type_with_hash.reset_hash()
        self.assertEqual(type_with_hash.hash_value, original_calculated_hash)

    def test_hash_value_cannot_be_set_if_hashable_has_immutable_hash_value(self):
        """Test that the hash value of a hashable instance with an immutable hash value cannot be set."""
        hashable = Hashable(immutable_hash_value="blue")

        with self.assertRaises(ValueError):
            hashable.hash_value = "red"
