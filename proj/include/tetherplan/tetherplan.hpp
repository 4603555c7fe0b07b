#pragma once

#include "tetherplan/cable_constraint.hpp"
#include "tetherplan/collision.hpp"
#include "tetherplan/geometry.hpp"
#include "tetherplan/grasps.hpp"
#include "tetherplan/harness.hpp"
#include "tetherplan/planner_types.hpp"
#include "tetherplan/random.hpp"
#include "tetherplan/regrasp_planner.hpp"
#include "tetherplan/robot_model.hpp"
#include "tetherplan/scene.hpp"
#include "tetherplan/scene_io.hpp"
#include "tetherplan/torque_model.hpp"
