/* tslint:disable */
/* eslint-disable */

export class Swarm {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Advances simulated time by `seconds` (stops at the horizon).
     */
    advance(seconds: number): void;
    cols(): number;
    /**
     * Percent of cells scanned at least once so far.
     */
    coverage(): number;
    finished(): boolean;
    flows(): number;
    height_m(): number;
    horizon(): number;
    mask_count(): number;
    /**
     * Row-major indices of cells inside any mask.
     */
    masked_cells(): Uint32Array;
    /**
     * `scheme` is one of AODV, Pipe, TC-Pipe, Relay; `scenario` one of C1–C4.
     */
    constructor(scenario: string, scheme: string, n_uavs: number, seed: number);
    /**
     * Raw pheromone per cell, row-major.
     */
    pheromone(): Float32Array;
    /**
     * `x, y` per node, indexed by node id (the BS is node 0).
     */
    positions(): Float32Array;
    /**
     * One role code per node, indexed by node id.
     */
    roles(): Uint8Array;
    routed_flows(): number;
    /**
     * Installed routes as node ids, source first, each closed by `ROUTE_END`.
     */
    routes(): Uint32Array;
    rows(): number;
    scheme(): string;
    /**
     * `x, y` per target.
     */
    targets(): Float32Array;
    time(): number;
    width_m(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_swarm_free: (a: number, b: number) => void;
    readonly swarm_advance: (a: number, b: number) => void;
    readonly swarm_cols: (a: number) => number;
    readonly swarm_coverage: (a: number) => number;
    readonly swarm_finished: (a: number) => number;
    readonly swarm_flows: (a: number) => number;
    readonly swarm_height_m: (a: number) => number;
    readonly swarm_horizon: (a: number) => number;
    readonly swarm_mask_count: (a: number) => number;
    readonly swarm_masked_cells: (a: number) => [number, number];
    readonly swarm_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly swarm_pheromone: (a: number) => [number, number];
    readonly swarm_positions: (a: number) => [number, number];
    readonly swarm_roles: (a: number) => [number, number];
    readonly swarm_routed_flows: (a: number) => number;
    readonly swarm_routes: (a: number) => [number, number];
    readonly swarm_rows: (a: number) => number;
    readonly swarm_scheme: (a: number) => [number, number];
    readonly swarm_targets: (a: number) => [number, number];
    readonly swarm_time: (a: number) => number;
    readonly swarm_width_m: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
