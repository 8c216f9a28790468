#pragma once

#include "helicable/error.hpp"
#include "helicable/helicoid.hpp"
#include "helicable/mesh.hpp"
#include "helicable/msh_io.hpp"
#include "helicable/disk_mesher.hpp"
#include "helicable/element.hpp"
#include "helicable/spaces.hpp"
#include "helicable/assembly.hpp"
#include "helicable/solve.hpp"
#include "helicable/post.hpp"
#include "helicable/export.hpp"
#include "helicable/config.hpp"
#include "helicable/run.hpp"
