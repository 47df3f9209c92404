/* tslint:disable */
/* eslint-disable */

/**
 * Result of one simulated cycle, flattened for typed-array transfer.
 */
export class CycleRun {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    altitude(): Float64Array;
    /**
     * Horizontal position across the wind [m].
     */
    crosswind(): Float64Array;
    ok(): boolean;
    /**
     * 0 traction, 1 transition to border, 2 retraction, 3 transition to traction.
     */
    phase(): Uint8Array;
    summary(): string;
}

/**
 * Searches a common Lyapunov matrix over the default uncertainty box and
 * describes the outcome.
 */
export function check_stability(design: string, gain1: number, gain2: number): string;

/**
 * Simulates until the first cycle closes (or 250 s), logging every 0.1 s.
 */
export function simulate_cycle(w0: number, reel_in_speed: number, law: string): CycleRun;

/**
 * Feasibility map over a gain grid, row-major with `gain2` fastest:
 * 1 certified, 0 not.
 */
export function stability_map(design: string, lo1: number, hi1: number, lo2: number, hi2: number, n: number): Uint8Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_cyclerun_free: (a: number, b: number) => void;
    readonly check_stability: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly cyclerun_altitude: (a: number) => [number, number];
    readonly cyclerun_crosswind: (a: number) => [number, number];
    readonly cyclerun_ok: (a: number) => number;
    readonly cyclerun_phase: (a: number) => [number, number];
    readonly cyclerun_summary: (a: number) => [number, number];
    readonly simulate_cycle: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly stability_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
