"""
Example usage of the derandkit package
"""

from derandkit import build_splitter, construct_family_file, universal_set, verify_family

# Example 1: a uniform (16, 2, 8)-splitter
splitter = build_splitter(16, 2, 8, goal="uniform")
print(f"Splitter: {len(splitter)} functions, branch {splitter.provenance['branch']}")

# Example 2: an (8, 2, 1/2)-universal set, checked by the oracle
family = universal_set(8, 2, "1/2")
print(verify_family(family).result_line())

# Example 3: build, verify and write a bisector file
result = construct_family_file("bisector", 8, 2, "./example_output/bisector.txt", alpha="1/2")

print(f"\nGenerated files:")
for key, value in result.items():
    print(f"  - {key}: {value}")

print("\nDone! Check the example_output directory for generated files.")
