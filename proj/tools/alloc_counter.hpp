#pragma once

// Process-wide heap allocation counter. Linking alloc_counter.cpp replaces
// the global operator new; only executables should do so.
long heap_allocations();
