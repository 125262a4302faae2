#pragma once

#include <string_view>

namespace depsentry::testing {

// npm package.json with an install hook and a literal elision line.
inline constexpr std::string_view kHookPackageJson = R"({
	"name": "example",
	"version": "1.0.0",
	... continues ...
	"scripts": {
		"pre-install": "** COMMANDS **"
	}
}
)";

// setup.py running code at module level.
inline constexpr std::string_view kTopLevelSetupPy = R"(from setuptools import setup

# Any Python code will be executed, for example:
import os; os.system("..COMMANDS..")
setup(name='foo',version='1.0', ...)
)";

// setup.py overriding the install command class.
inline constexpr std::string_view kCmdclassSetupPy = R"(from distutils.core import setup
from setuptools.command.install import install  # Required import

class ExampleClass(install):
	def run(self):
		install.run(self)
		# Any Python code will be executed, for example:
		import os; os.system("**COMMANDS**")

setup(name='foo', ..., cmdclass={'install': ExampleClass})
)";

// build.rs spawning a shell, with a '#' comment line that rustc would reject.
inline constexpr std::string_view kShellBuildRs = R"(use std::process::Command;

fn main() {
	# Any arbitrary Rust code can be executed, for example:
	let output =  Command::new("sh")
		.arg("-c")
		.arg("**COMMANDS**")
		.output();
}
)";

inline constexpr std::string_view kPlainCargoToml = R"([package]
name = "example"
version = "1.0.0"
)";

// gemspec declaring a build extension.
inline constexpr std::string_view kExtensionGemspec = R"(Gem::Specification.new do |s|
s.name        = "example"
s.version     = "1.0.0"
... continues ...
s.extensions  = ["extconf.rb"]
end
)";

// extconf.rb executing a command at build time.
inline constexpr std::string_view kExecExtconf = R"(require "mkmf"

# Any arbitrary Ruby code will be executed, e.g.:
exec("**COMMANDS**")

# Needed to finish the extension without errors
create_makefile("")
)";

// Renamed identifiers from an obfuscated setup.py.
inline constexpr std::string_view kRenamedSetupPy = R"(import sys
l1l_cringe_ = sys.version_info [0] == 2
l1l1l_cringe_ = 2048
l11_cringe_ = 7
def l111_cringe_ (l1ll_cringe_):
	global l11l1_cringe_
	l11l_cringe_ = ord (l1ll_cringe_ [-1])
	ll_cringe_ = l1ll_cringe_ [:-1]
	l1l1_cringe_ = l11l_cringe_ 
	l1_cringe_ = ll_cringe_ [:l1l1_cringe_] + ll_cringe_ [l1l1_cringe_:]
... continues ...
)";

// Monkey-patching the print builtin.
inline constexpr std::string_view kPrintPatch = R"(import os, builtins

original_print = print
def hacked_print(self):
	original_print(self)
	os.system("..COMMANDS..")
builtins.print = hacked_print
)";

}  // namespace depsentry::testing
