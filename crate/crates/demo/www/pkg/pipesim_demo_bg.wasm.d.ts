/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_swarm_free: (a: number, b: number) => void;
export const swarm_advance: (a: number, b: number) => void;
export const swarm_cols: (a: number) => number;
export const swarm_coverage: (a: number) => number;
export const swarm_finished: (a: number) => number;
export const swarm_flows: (a: number) => number;
export const swarm_height_m: (a: number) => number;
export const swarm_horizon: (a: number) => number;
export const swarm_mask_count: (a: number) => number;
export const swarm_masked_cells: (a: number) => [number, number];
export const swarm_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const swarm_pheromone: (a: number) => [number, number];
export const swarm_positions: (a: number) => [number, number];
export const swarm_roles: (a: number) => [number, number];
export const swarm_routed_flows: (a: number) => number;
export const swarm_routes: (a: number) => [number, number];
export const swarm_rows: (a: number) => number;
export const swarm_scheme: (a: number) => [number, number];
export const swarm_targets: (a: number) => [number, number];
export const swarm_time: (a: number) => number;
export const swarm_width_m: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
