use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};

use kexpand::wht::{wht_fast, wht_recursive, WhtPlan};

struct Counting;

static ALLOCATIONS: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        ALLOCATIONS.fetch_add(1, Ordering::SeqCst);
        System.alloc(layout)
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout)
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        ALLOCATIONS.fetch_add(1, Ordering::SeqCst);
        System.realloc(ptr, layout, new_size)
    }
}

#[global_allocator]
static GLOBAL: Counting = Counting;

#[test]
fn transforms_do_not_allocate() {
    let plan = WhtPlan::new(64).unwrap();
    let mut buffers: Vec<Vec<f32>> = (0..=16).map(|k| vec![1.0f32; 1 << k]).collect();
    let mut wide: Vec<f64> = vec![0.5; 1 << 12];
    let before = ALLOCATIONS.load(Ordering::SeqCst);
    for b in buffers.iter_mut() {
        wht_fast(b).unwrap();
        plan.transform(b).unwrap();
        wht_recursive(b).unwrap();
    }
    wht_fast(&mut wide).unwrap();
    let after = ALLOCATIONS.load(Ordering::SeqCst);
    assert_eq!(after, before, "transforms allocated {} times", after - before);
}
